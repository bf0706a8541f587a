#include "commands.hpp"

int main(int argc, char** argv) { return fracwrmg::cli::run_cli(argc, argv); }
