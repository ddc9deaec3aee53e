#include "rulehead/cli.hpp"

int main(int argc, char** argv) { return rulehead::run_cli(argc, argv); }
