#include "embedforge/cli/cli_app.hpp"

int main(int argc, char** argv) { return embedforge::run_cli(argc, argv); }
