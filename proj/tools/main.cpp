#include "ddsusy/cli.hpp"

int main(int argc, char** argv) { return ddsusy::run_cli(argc, argv); }
