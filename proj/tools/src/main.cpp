#include "cli.hpp"

int main(int argc, char** argv) { return fairsvdd::cli::run(argc, argv); }
