#include "mshift/cli.hpp"

int main(int argc, char** argv) { return mshift::cli::run(argc, argv); }
