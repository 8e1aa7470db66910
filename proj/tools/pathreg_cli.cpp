#include "pathreg/cli.hpp"

int main(int argc, char** argv) { return pathreg::cli_main(argc, argv); }
