#include "permlim/cli.hpp"

int main(int argc, char** argv) { return permlim::run(argc, argv); }
