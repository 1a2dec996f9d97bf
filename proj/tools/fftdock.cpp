#include "fftdock/cli.hpp"

int main(int argc, char** argv) { return fftdock::run_cli(argc, argv); }
