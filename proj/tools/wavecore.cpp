#include "wavecore/io_cli.hpp"

int main(int argc, char** argv) { return wavecore::run_cli(argc, argv); }
