// Writes the synthetic evaluation scene as a PGM, for trying the CLI without
// an external image corpus.
#include <cstdio>
#include <cstdlib>
#include <string>

#include "smoe/pgm_io.hpp"
#include "smoe/scene.hpp"

int main(int argc, char** argv) {
    if (argc < 2 || argc > 3) {
        std::fprintf(stderr, "usage: make_scene <out.pgm> [size=256]\n");
        return 1;
    }
    const int size = argc == 3 ? std::atoi(argv[2]) : 256;
    if (size < 16) {
        std::fprintf(stderr, "make_scene: size must be >= 16\n");
        return 1;
    }
    try {
        smoe::save_image(smoe::synthetic_scene(size), argv[1]);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "make_scene: %s\n", e.what());
        return 2;
    }
    return 0;
}
