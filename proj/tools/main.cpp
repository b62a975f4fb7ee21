#include "tbw/cli.hpp"

int main(int argc, char** argv) { return tbw::cli::run(argc, argv); }
