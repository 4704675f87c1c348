#include "mwi_tools/cli.hpp"

int main(int argc, char** argv) { return mwi::cli::cli_main(argc, argv); }
