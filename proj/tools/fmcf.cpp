#include "fmcf/cli.hpp"

int main(int argc, char** argv) { return fmcf::run_cli(argc, argv); }
