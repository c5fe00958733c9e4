#include "edr/cli.hpp"

int main(int argc, char** argv) { return edr::run_cli(argc, argv); }
