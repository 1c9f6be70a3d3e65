#include "ccsica/cli.hpp"

int main(int argc, char** argv) { return ccsica::cli::run(argc, argv); }
