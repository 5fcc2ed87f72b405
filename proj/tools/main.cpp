#include "stressnet/cli.hpp"

int main(int argc, char** argv) { return stressnet::run_cli(argc, argv); }
