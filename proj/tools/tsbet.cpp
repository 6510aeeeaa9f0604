#include "tsbet/cli.hpp"

int main(int argc, char** argv) { return tsbet::cli::run(argc, argv); }
