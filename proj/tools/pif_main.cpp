#include "pif/cli.hpp"

int main(int argc, char** argv) { return pif::cli_main(argc, argv); }
