#include "icupred/cli.hpp"

int main(int argc, char** argv) { return icupred::cli::cli_main(argc, argv); }
