// Test helper speaking the external predictor protocol: CSV with a header on
// stdin, one prediction per line on stdout.
//
//   linear_predictor <intercept> <coef_1> ... <coef_p>
//   linear_predictor --drop-last <intercept> <coef_1> ... <coef_p>
//   linear_predictor --sleep <seconds>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

int main(int argc, char** argv) {
    int arg = 1;
    bool drop_last = false;
    if (arg < argc && std::strcmp(argv[arg], "--sleep") == 0) {
        std::this_thread::sleep_for(std::chrono::duration<double>(std::atof(argv[arg + 1])));
        return 0;
    }
    if (arg < argc && std::strcmp(argv[arg], "--drop-last") == 0) {
        drop_last = true;
        ++arg;
    }
    if (arg >= argc) {
        std::cerr << "usage: linear_predictor [--drop-last] <intercept> <coef>...\n";
        return 2;
    }
    const double intercept = std::strtod(argv[arg++], nullptr);
    std::vector<double> coef;
    for (; arg < argc; ++arg) coef.push_back(std::strtod(argv[arg], nullptr));

    std::string line;
    if (!std::getline(std::cin, line)) return 0;  // header
    std::vector<double> out;
    while (std::getline(std::cin, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        double s = intercept;
        std::size_t j = 0;
        while (std::getline(ss, cell, ',')) {
            if (j >= coef.size()) {
                std::cerr << "too many columns\n";
                return 1;
            }
            s += coef[j++] * std::strtod(cell.c_str(), nullptr);
        }
        out.push_back(s);
    }
    if (drop_last && !out.empty()) out.pop_back();
    for (double v : out) std::printf("%.17g\n", v);
    return 0;
}
