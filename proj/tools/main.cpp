#include "cli.hpp"

int main(int argc, char** argv) { return stacklq::cli::run(argc, argv); }
