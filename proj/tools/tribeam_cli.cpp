// SPDX-License-Identifier: Apache-2.0

#include <cstdio>

#include "tribeam/grid.hpp"
#include "tribeam/solver.hpp"

int main() {
    std::printf("tribeam cli placeholder\n");
    return 0;
}
