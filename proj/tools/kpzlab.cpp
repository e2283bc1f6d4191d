#include <iostream>

#include "kpz/commands.hpp"

int main(int argc, char** argv) { return kpz::kpzlab_main(argc, argv, std::cout, std::cerr); }
