#include "vph/cli.hpp"

int main(int argc, char** argv) { return vph::cli_main(argc, argv); }
