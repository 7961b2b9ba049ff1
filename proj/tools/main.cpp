#include "cli.hpp"

int main(int argc, char** argv) { return secest::cli::run(argc, argv); }
