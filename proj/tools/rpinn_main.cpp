#include "rpinn/cli.hpp"

int main(int argc, char** argv) { return rpinn::cli_main(argc, argv); }
