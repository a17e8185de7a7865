#include <string>
#include <vector>

#include "firlab/cli.hpp"

int main(int argc, char** argv) {
    return firlab::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
