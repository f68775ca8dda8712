#include "cphs/cli.hpp"

int main(int argc, char** argv) { return cphs::cli_dispatch(argc, argv); }
