#include "dns/cli.hpp"

int main(int argc, char** argv) { return dns::cli::main(argc, argv); }
