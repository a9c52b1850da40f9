#include "fewrays/cli.hpp"

int main(int argc, char** argv) { return fewrays::run_cli(argc, argv); }
