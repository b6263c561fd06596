#include "atlantis/cli/pipeline.hpp"

int main(int argc, char** argv) { return atlantis::cli::run_cli(argc, argv); }
