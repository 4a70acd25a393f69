#include <vector>

#include "copaint/cli.hpp"

int main(int argc, char** argv) {
    return copaint::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
