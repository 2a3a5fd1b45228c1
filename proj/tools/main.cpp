#include "cli.hpp"

int main(int argc, char** argv) { return hstv::cli::run(argc, argv); }
