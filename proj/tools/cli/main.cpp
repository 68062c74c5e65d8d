#include "cli/app.hpp"

int main(int argc, char** argv) { return triplesum::cli::run(std::vector<std::string>(argv + 1, argv + argc)); }
