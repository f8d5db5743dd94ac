#include "sylv/cli.hpp"

int main(int argc, char** argv) { return sylv::cli::run(argc, argv); }
