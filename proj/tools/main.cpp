#include "fdr/cli.hpp"

int main(int argc, char** argv) { return fdr::cli::cli_main(argc, argv); }
