#include "slh/cli.hpp"

int main(int argc, char** argv) { return slh::run_cli(argc, argv); }
