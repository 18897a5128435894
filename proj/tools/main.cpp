#include "cli.hpp"

int main(int argc, char** argv) { return magnetolab::cli::run(argc, argv); }
