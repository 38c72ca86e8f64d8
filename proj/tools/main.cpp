#include "commands.hpp"

int main(int argc, char** argv) { return hypofbi::app::run_cli(argc, argv); }
