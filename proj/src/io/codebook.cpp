#include "favis/error.hpp"
#include "favis/io.hpp"
#include "favis/serialize.hpp"

namespace favis {

CodebookReadResult parse_codebook(std::string_view text) {
    Json json;
    try {
        json = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ParseError(0, 0, std::string("codebook is not valid JSON (byte ") + std::to_string(e.byte) + ")");
    }
    std::vector<std::string> warnings;
    Codebook codebook = codebook_from_json(json, &warnings);
    return {std::move(codebook), std::move(warnings)};
}

CodebookReadResult read_codebook(const std::filesystem::path& path) {
    return parse_codebook(read_text_file(path));
}

}  // namespace favis
