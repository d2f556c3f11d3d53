#include "spsim/cli.hpp"

int main(int argc, char** argv) { return spsim::cli_main(argc, argv); }
