// Minimal external objective: answers "EVAL v1 ... vD" with the sum of
// squares. Optional argv[1] = "crash-after=<k>" exits without replying to
// request k+1; "garbage" replies with a non-number.
#include <charconv>
#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>

int main(int argc, char** argv) {
    long crash_after = -1;
    bool garbage = false;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg.rfind("crash-after=", 0) == 0) crash_after = std::strtol(arg.c_str() + 12, nullptr, 10);
        if (arg == "garbage") garbage = true;
    }
    const char* dim_env = std::getenv("BO_OBJECTIVE_DIM");
    const long dim = dim_env != nullptr ? std::strtol(dim_env, nullptr, 10) : -1;

    std::string line;
    long served = 0;
    while (std::getline(std::cin, line)) {
        if (crash_after >= 0 && served >= crash_after) return 3;
        std::istringstream in(line);
        std::string tag;
        in >> tag;
        if (tag != "EVAL") return 4;
        double sum = 0.0;
        long count = 0;
        std::string tok;
        while (in >> tok) {
            double v = 0.0;
            std::from_chars(tok.data(), tok.data() + tok.size(), v);
            sum += v * v;
            ++count;
        }
        if (dim >= 0 && count != dim) return 5;
        if (garbage) {
            std::cout << "not-a-number" << std::endl;
        } else {
            char buf[64];
            const auto res = std::to_chars(buf, buf + sizeof(buf), sum);
            std::cout << std::string(buf, res.ptr) << std::endl;
        }
        ++served;
    }
    return 0;
}
