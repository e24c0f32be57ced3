#include "dualex/pipeline.hpp"

int main(int argc, char** argv) { return dualex::run_cli(argc, argv); }
