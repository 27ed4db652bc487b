#include "transactive/scenario.hpp"

int main(int argc, char** argv) { return transactive::cli_main(argc, argv); }
