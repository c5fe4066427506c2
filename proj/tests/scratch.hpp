#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

// Per-test temporary directory, removed on destruction.
class Scratch {
public:
    Scratch() {
        std::random_device rd;
        dir_ = std::filesystem::temp_directory_path() / ("cbs-test-" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(dir_);
    }
    ~Scratch() {
        std::error_code ec;
        std::filesystem::remove_all(dir_, ec);
    }
    Scratch(const Scratch&) = delete;
    Scratch& operator=(const Scratch&) = delete;

    std::filesystem::path path(const std::string& name) const { return dir_ / name; }

    std::filesystem::path write(const std::string& name, const std::string& content) const {
        const auto p = path(name);
        std::ofstream(p, std::ios::binary) << content;
        return p;
    }

private:
    std::filesystem::path dir_;
};

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}
