#include "beurling/cli/cli.hpp"

int main(int argc, char** argv) { return beurling::cli::run(argc, argv); }
