#include "smoe/cli.hpp"

int main(int argc, char** argv) { return smoe::run_cli(argc, argv); }
