#include "eatrad/cli.hpp"

int main(int argc, char** argv) { return eatrad::run_cli(argc, argv); }
