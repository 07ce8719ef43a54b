#include "goafem/cli.hpp"

int main(int argc, char** argv) { return goafem::cli_main(argc, argv); }
