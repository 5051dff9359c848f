#include "saic/cli.hpp"

int main(int argc, char** argv) { return saic::cli::run(argc, argv); }
