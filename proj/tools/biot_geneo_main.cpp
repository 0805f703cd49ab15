#include "biotgeneo/cli.hpp"

int main(int argc, char** argv) { return biotgeneo::run_cli(argc, argv); }
