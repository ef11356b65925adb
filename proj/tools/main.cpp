#include "hyprl/cli.hpp"

int main(int argc, char** argv) {
    return hyprl::cli::run(std::vector<std::string>(argv + 1, argv + argc));
}
