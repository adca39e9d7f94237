#include "patternsieve/cli.hpp"

int main(int argc, char** argv) { return patternsieve::cli::run(argc, argv); }
