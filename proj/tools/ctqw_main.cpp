#include "ctqw/cli.hpp"

int main(int argc, char** argv) { return ctqw::cli_main(argc, argv); }
