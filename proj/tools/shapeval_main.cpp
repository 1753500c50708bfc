#include "shapeval/cli.hpp"

int main(int argc, char** argv) { return shapeval::run_cli(argc, argv); }
