#include "epidcov/cli.hpp"

int main(int argc, char** argv) { return epidcov::run_cli(argc, argv); }
