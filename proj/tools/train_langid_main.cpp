#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "warcpipe/langid.hpp"

namespace fs = std::filesystem;
using namespace warcpipe;

int main(int argc, char** argv) {
    CLI::App app{"Train the two language-identification stages from per-language text files"};
    std::string data_dir, out_dir;
    int rank_max_n = 5;
    std::size_t rank_size = 400;
    int bayes_max_n = 4;
    double alpha = 0.5;
    std::vector<std::string> stage1_langs;
    app.add_option("--data", data_dir, "Directory of <lang>.txt training files")->required();
    app.add_option("--out", out_dir, "Model directory; stage1/ and stage2/ are written below it")->required();
    app.add_option("--rank-max-n", rank_max_n);
    app.add_option("--rank-size", rank_size);
    app.add_option("--bayes-max-n", bayes_max_n);
    app.add_option("--alpha", alpha, "Additive smoothing");
    app.add_option("--stage1-langs", stage1_langs, "Languages given a stage-1 profile (default: all)")->delimiter(',');
    CLI11_PARSE(app, argc, argv);

    std::map<std::string, std::string> corpora;
    for (const auto& entry : fs::directory_iterator(data_dir)) {
        if (entry.path().extension() != ".txt") continue;
        std::ifstream in(entry.path(), std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        corpora[entry.path().stem().string()] = ss.str();
    }
    if (corpora.empty()) {
        std::cerr << "no *.txt files in " << data_dir << '\n';
        return 1;
    }
    try {
        fs::create_directories(fs::path(out_dir) / "stage1");
        fs::create_directories(fs::path(out_dir) / "stage2");
        for (const auto& [lang, text] : corpora) {
            if (!stage1_langs.empty() && std::find(stage1_langs.begin(), stage1_langs.end(), lang) == stage1_langs.end())
                continue;
            save_profile(train_rank_profile(lang, text, rank_max_n, rank_size),
                         fs::path(out_dir) / "stage1" / (lang + ".tsv"));
        }
        for (const auto& profile : train_bayes_profiles(corpora, bayes_max_n, alpha))
            save_profile(profile, fs::path(out_dir) / "stage2" / (profile.lang + ".tsv"));
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    std::cout << "trained " << corpora.size() << " languages into " << out_dir << '\n';
    return 0;
}
