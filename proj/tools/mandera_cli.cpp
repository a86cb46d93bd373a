#include "mandera/cli.hpp"

int main(int argc, char** argv) { return mandera::cli_main(argc, argv); }
