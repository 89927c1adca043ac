#include "swave/cli.hpp"

int main(int argc, char** argv) { return swave::cli::main_entry(argc, argv); }
