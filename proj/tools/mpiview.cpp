#include "mpiv/cli.h"

int main(int argc, char** argv) { return mpiv::run_cli(argc, argv); }
