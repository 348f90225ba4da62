#pragma once

#include <cctype>
#include <string>

#include "concept.hpp"
#include "database.hpp"

namespace dlfit {

// Recursive-descent parser for the concept grammar:
//   C ::= top | bot | NAME | not C
//       | (C and C) | (C or C)
//       | (exists R . C) | (forall R . C)
//       | (atleast N R . C) | (atmost N R . C)
//       | (FEATURE >= V) | (FEATURE <= V)
//   R ::= NAME | inv(NAME)
// `not` binds to the following primary; plain parentheses group.
class ConceptParser {
public:
    explicit ConceptParser(std::string text) : text_(std::move(text)) {}

    Concept parse() {
        Concept c = parse_primary();
        skip_ws();
        if (pos_ != text_.size())
            fail("trailing input after concept");
        return c;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const {
        int line = 1, col = 1;
        for (std::size_t i = 0; i < pos_ && i < text_.size(); ++i) {
            if (text_[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ParseError(msg, line, col);
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace((unsigned char)text_[pos_]))
            ++pos_;
    }

    bool peek_is(char c) {
        skip_ws();
        return pos_ < text_.size() && text_[pos_] == c;
    }

    void expect(char c) {
        skip_ws();
        if (pos_ >= text_.size() || text_[pos_] != c)
            fail(std::string("expected '") + c + "'");
        ++pos_;
    }

    std::string read_word() {
        skip_ws();
        std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum((unsigned char)text_[pos_]) || text_[pos_] == '_'))
            ++pos_;
        if (pos_ == start)
            fail("expected a name");
        return text_.substr(start, pos_ - start);
    }

    std::string read_number_literal() {
        skip_ws();
        std::size_t start = pos_;
        if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+'))
            ++pos_;
        while (pos_ < text_.size() &&
               (std::isdigit((unsigned char)text_[pos_]) || text_[pos_] == '.'))
            ++pos_;
        if (pos_ == start)
            fail("expected a number");
        return text_.substr(start, pos_ - start);
    }

    RoleRef parse_role() {
        std::string word = read_word();
        if (word == "inv") {
            expect('(');
            std::string name = read_word();
            expect(')');
            return RoleRef{name, true};
        }
        return RoleRef{word, false};
    }

    Concept parse_primary() {
        skip_ws();
        if (pos_ >= text_.size())
            fail("unexpected end of input");
        if (text_[pos_] == '(')
            return parse_parenthesized();
        std::string word = read_word();
        if (word == "top")
            return top();
        if (word == "bot")
            return bot();
        if (word == "not")
            return negation(parse_primary());
        if (!is_valid_name(word))
            fail("invalid name: " + word);
        return concept_name(word);
    }

    Concept parse_parenthesized() {
        expect('(');
        skip_ws();
        std::size_t mark = pos_;
        // Keyword-led forms first.
        if (std::isalpha((unsigned char)text_[pos_])) {
            std::string word = read_word();
            if (word == "exists" || word == "forall") {
                RoleRef role = parse_role();
                expect('.');
                Concept c = parse_primary();
                expect(')');
                return word == "exists" ? exists(role, c) : forall(role, c);
            }
            if (word == "atleast" || word == "atmost") {
                std::string num = read_number_literal();
                unsigned n = 0;
                for (char ch : num) {
                    if (!std::isdigit((unsigned char)ch))
                        fail("restriction number must be a nonnegative integer");
                    n = n * 10 + (unsigned)(ch - '0');
                }
                if (word == "atleast" && n < 1)
                    fail("atleast requires n >= 1");
                RoleRef role = parse_role();
                expect('.');
                Concept c = parse_primary();
                expect(')');
                return word == "atleast" ? at_least(n, role, c) : at_most(n, role, c);
            }
            // Feature comparison: NAME >= V or NAME <= V.
            skip_ws();
            if (pos_ + 1 < text_.size() && (text_[pos_] == '>' || text_[pos_] == '<') &&
                text_[pos_ + 1] == '=') {
                bool geq = text_[pos_] == '>';
                pos_ += 2;
                Decimal v = Decimal::parse(read_number_literal());
                expect(')');
                return geq ? feature_geq(word, v) : feature_leq(word, v);
            }
            pos_ = mark;  // fall through to binary/grouping
        }
        Concept left = parse_primary();
        skip_ws();
        if (peek_is(')')) {
            ++pos_;
            return left;
        }
        std::string op = read_word();
        if (op != "and" && op != "or")
            fail("expected 'and' or 'or'");
        Concept right = parse_primary();
        expect(')');
        return op == "and" ? conjunction(left, right) : disjunction(left, right);
    }

    std::string text_;
    std::size_t pos_ = 0;
};

inline Concept parse_concept(const std::string& text) { return ConceptParser(text).parse(); }

}  // namespace dlfit
