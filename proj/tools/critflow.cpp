#include "critflow/cli.hpp"

int main(int argc, char** argv) { return critflow::cli::run(argc, argv); }
