#include "cli.hpp"

int main(int argc, char** argv) { return qab::cli::run_cli(argc, argv); }
