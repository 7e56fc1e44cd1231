#include <cstdio>

int main() {
    std::puts("rmfs: subcommands not wired up yet");
    return 0;
}
