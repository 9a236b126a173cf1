#include "mvops/cli.hpp"

int main(int argc, char** argv) { return mvops::cli::run(argc, argv); }
