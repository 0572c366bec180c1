#include <iostream>

#include "lp_cases.hpp"

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: lp_cases <output-dir>\n";
        return 1;
    }
    std::cout << lp_cases::write(argv[1]) << " instances written to " << argv[1] << '\n';
    return 0;
}
