#include <cmath>
#include <string>
#include <vector>

#include "fieldops/metrics.hpp"
#include "text_util.hpp"

// Minimal XML reader covering the annotation subset: elements, text,
// attributes (parsed and discarded), comments, CDATA, processing
// instructions, DOCTYPE and the five predefined entities. Total on arbitrary
// bytes: every failure is a structured Error with a byte offset.

namespace fieldops {

namespace {

constexpr int kMaxDepth = 256;

struct XmlNode {
    std::string name;
    std::string text;  // concatenated character data of this element
    std::vector<XmlNode> children;
};

class XmlParser {
public:
    explicit XmlParser(std::span<const std::uint8_t> bytes) : b_(bytes) {}

    XmlNode parse_document() {
        // UTF-8 byte-order mark
        if (b_.size() >= 3 && b_[0] == 0xEF && b_[1] == 0xBB && b_[2] == 0xBF) pos_ = 3;
        skip_prolog();
        if (pos_ >= b_.size() || b_[pos_] != '<')
            fail("expected root element");
        XmlNode root = parse_element(0);
        skip_prolog();
        if (pos_ != b_.size()) fail("trailing data after root element");
        return root;
    }

private:
    std::span<const std::uint8_t> b_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& msg) const {
        throw Error(ErrorKind::Parse, "xml: " + msg + " at byte " + std::to_string(pos_));
    }

    bool starts_with(const char* s) const {
        std::size_t n = std::char_traits<char>::length(s);
        if (pos_ + n > b_.size()) return false;
        for (std::size_t i = 0; i < n; ++i)
            if (b_[pos_ + i] != std::uint8_t(s[i])) return false;
        return true;
    }

    void skip_until(const char* terminator, const char* what) {
        while (pos_ < b_.size() && !starts_with(terminator)) ++pos_;
        if (pos_ >= b_.size()) fail(std::string("unterminated ") + what);
        pos_ += std::char_traits<char>::length(terminator);
    }

    static bool is_ws(std::uint8_t c) {
        return c == ' ' || c == '\t' || c == '\n' || c == '\r';
    }

    void skip_ws() {
        while (pos_ < b_.size() && is_ws(b_[pos_])) ++pos_;
    }

    // whitespace, comments, <?...?> and <!DOCTYPE ...> before/after the root
    void skip_prolog() {
        while (true) {
            skip_ws();
            if (starts_with("<!--")) {
                skip_until("-->", "comment");
            } else if (starts_with("<?")) {
                skip_until("?>", "processing instruction");
            } else if (starts_with("<!DOCTYPE")) {
                skip_until(">", "doctype");
            } else {
                return;
            }
        }
    }

    static bool is_name_start(std::uint8_t c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c == ':';
    }
    static bool is_name_char(std::uint8_t c) {
        return is_name_start(c) || (c >= '0' && c <= '9') || c == '-' || c == '.';
    }

    std::string parse_name() {
        if (pos_ >= b_.size() || !is_name_start(b_[pos_])) fail("expected element name");
        std::size_t start = pos_;
        while (pos_ < b_.size() && is_name_char(b_[pos_])) ++pos_;
        return std::string(reinterpret_cast<const char*>(b_.data()) + start, pos_ - start);
    }

    void parse_attributes() {
        while (true) {
            skip_ws();
            if (pos_ >= b_.size()) fail("unterminated start tag");
            if (b_[pos_] == '>' || b_[pos_] == '/') return;
            parse_name();
            skip_ws();
            if (pos_ >= b_.size() || b_[pos_] != '=') fail("expected '=' in attribute");
            ++pos_;
            skip_ws();
            if (pos_ >= b_.size() || (b_[pos_] != '"' && b_[pos_] != '\''))
                fail("expected quoted attribute value");
            std::uint8_t quote = b_[pos_++];
            while (pos_ < b_.size() && b_[pos_] != quote) ++pos_;
            if (pos_ >= b_.size()) fail("unterminated attribute value");
            ++pos_;
        }
    }

    void append_entity(std::string& out) {
        std::size_t end = pos_ + 1;
        while (end < b_.size() && b_[end] != ';' && end - pos_ < 12) ++end;
        if (end >= b_.size() || b_[end] != ';') fail("unterminated entity");
        std::string name(reinterpret_cast<const char*>(b_.data()) + pos_ + 1, end - pos_ - 1);
        if (name == "lt") out += '<';
        else if (name == "gt") out += '>';
        else if (name == "amp") out += '&';
        else if (name == "quot") out += '"';
        else if (name == "apos") out += '\'';
        else if (!name.empty() && name[0] == '#') {
            long code = 0;
            bool ok = !name.substr(1).empty();
            if (name.size() > 2 && (name[1] == 'x' || name[1] == 'X')) {
                for (std::size_t i = 2; i < name.size() && ok; ++i) {
                    char c = name[i];
                    int digit = c >= '0' && c <= '9'   ? c - '0'
                                : c >= 'a' && c <= 'f' ? c - 'a' + 10
                                : c >= 'A' && c <= 'F' ? c - 'A' + 10
                                                       : -1;
                    ok = digit >= 0 && code < 0x110000;
                    if (ok) code = code * 16 + digit;
                }
                ok = ok && name.size() > 2;
            } else {
                for (std::size_t i = 1; i < name.size() && ok; ++i) {
                    ok = name[i] >= '0' && name[i] <= '9' && code < 0x110000;
                    if (ok) code = code * 10 + (name[i] - '0');
                }
            }
            if (!ok) fail("bad character reference");
            if (code < 0x80) {
                out += char(code);
            } else {
                // keep it simple: non-ASCII references become '?'
                out += '?';
            }
        } else {
            fail("unknown entity '&" + name + ";'");
        }
        pos_ = end + 1;
    }

    XmlNode parse_element(int depth) {
        if (depth > kMaxDepth) fail("nesting too deep");
        if (pos_ >= b_.size() || b_[pos_] != '<') fail("expected '<'");
        ++pos_;
        XmlNode node;
        node.name = parse_name();
        parse_attributes();
        if (b_[pos_] == '/') {
            ++pos_;
            if (pos_ >= b_.size() || b_[pos_] != '>') fail("expected '/>'");
            ++pos_;
            return node;  // self-closing
        }
        ++pos_;  // '>'
        while (true) {
            if (pos_ >= b_.size()) fail("unterminated element <" + node.name + ">");
            if (starts_with("</")) {
                pos_ += 2;
                std::string closing = parse_name();
                if (closing != node.name)
                    fail("mismatched closing tag </" + closing + "> for <" + node.name + ">");
                skip_ws();
                if (pos_ >= b_.size() || b_[pos_] != '>') fail("expected '>'");
                ++pos_;
                return node;
            }
            if (starts_with("<!--")) {
                skip_until("-->", "comment");
            } else if (starts_with("<![CDATA[")) {
                pos_ += 9;
                std::size_t start = pos_;
                while (pos_ < b_.size() && !starts_with("]]>")) ++pos_;
                if (pos_ >= b_.size()) fail("unterminated CDATA");
                node.text.append(reinterpret_cast<const char*>(b_.data()) + start,
                                 pos_ - start);
                pos_ += 3;
            } else if (starts_with("<?")) {
                skip_until("?>", "processing instruction");
            } else if (b_[pos_] == '<') {
                node.children.push_back(parse_element(depth + 1));
            } else if (b_[pos_] == '&') {
                append_entity(node.text);
            } else {
                node.text += char(b_[pos_]);
                ++pos_;
            }
        }
    }
};

const XmlNode* find_child(const XmlNode& node, std::string_view name) {
    for (const XmlNode& child : node.children)
        if (child.name == name) return &child;
    return nullptr;
}

std::string trimmed_text(const XmlNode& node) {
    return std::string(text::trim(node.text));
}

double required_number(const XmlNode& bndbox, const char* name, std::size_t object_index) {
    const XmlNode* child = find_child(bndbox, name);
    if (!child)
        throw Error(ErrorKind::Parse, "voc: missing <" + std::string(name) +
                                          "> in <bndbox> (object " +
                                          std::to_string(object_index) + ")");
    return text::parse_double(trimmed_text(*child),
                              "voc: <" + std::string(name) + "> (object " +
                                  std::to_string(object_index) + ")");
}

}  // namespace

std::vector<GroundTruth> parse_voc_xml(std::span<const std::uint8_t> bytes) {
    XmlParser parser(bytes);
    XmlNode root = parser.parse_document();
    if (root.name != "annotation")
        throw Error(ErrorKind::Parse,
                    "voc: expected <annotation> root, got <" + root.name + ">");
    const XmlNode* filename = find_child(root, "filename");
    if (!filename) throw Error(ErrorKind::Parse, "voc: missing <filename>");
    std::string image_id = trimmed_text(*filename);

    std::vector<GroundTruth> out;
    std::size_t object_index = 0;
    for (const XmlNode& child : root.children) {
        if (child.name != "object") continue;
        const XmlNode* name = find_child(child, "name");
        if (!name)
            throw Error(ErrorKind::Parse, "voc: missing <name> (object " +
                                              std::to_string(object_index) + ")");
        const XmlNode* bndbox = find_child(child, "bndbox");
        if (!bndbox)
            throw Error(ErrorKind::Parse, "voc: missing <bndbox> (object " +
                                              std::to_string(object_index) + ")");
        GroundTruth gt;
        gt.image_id = image_id;
        gt.label = trimmed_text(*name);
        gt.box.xmin = required_number(*bndbox, "xmin", object_index);
        gt.box.ymin = required_number(*bndbox, "ymin", object_index);
        gt.box.xmax = required_number(*bndbox, "xmax", object_index);
        gt.box.ymax = required_number(*bndbox, "ymax", object_index);
        if (!(gt.box.xmin < gt.box.xmax))
            throw Error(ErrorKind::Validation, "voc: xmin >= xmax (object " +
                                                   std::to_string(object_index) + ")");
        if (!(gt.box.ymin < gt.box.ymax))
            throw Error(ErrorKind::Validation, "voc: ymin >= ymax (object " +
                                                   std::to_string(object_index) + ")");
        out.push_back(std::move(gt));
        ++object_index;
    }
    return out;
}

}  // namespace fieldops
