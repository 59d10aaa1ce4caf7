#include "randnet/cli.hpp"

int main(int argc, char** argv) { return randnet::cli::main(argc, argv); }
