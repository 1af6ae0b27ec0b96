#include "impulseq/cli.hpp"

int main(int argc, char** argv) { return impulseq::cli::main(argc, argv); }
