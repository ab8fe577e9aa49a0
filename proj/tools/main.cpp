#include "blrhl/cli/commands.hpp"

int main(int argc, char** argv) { return blrhl::cli::run_cli(argc, argv); }
