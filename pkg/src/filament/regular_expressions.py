"""
This modules contains the regular expressions of the filament token set
"""
import re

###########################################
# Layout
###########################################
# line comments run from // to the end of the line
COMMENT_REGEXP = r"//[^\n]*"
WHITESPACE_REGEXP = r"[ \t\r\f\v]+"
NEWLINE_REGEXP = r"\n"

###########################################
# Words and numbers
###########################################
# identifiers start with a letter or an underscore: G, m0, Gf_2, _tmp
IDENT_REGEXP = r"[A-Za-z_][A-Za-z0-9_]*"
# decimal integers only: widths, offsets, delays and parameters
INT_REGEXP = r"\d+"
# @interface must be matched before the plain @ of an interval annotation
INTERFACE_REGEXP = r"@interface\b"

KEYWORDS = frozenset({"comp", "extern", "new", "where"})

###########################################
# Punctuation
###########################################
# two character symbols come first so that := is not read as : followed by =
SYMBOLS = (":=", "->", ">=", "<=", "@", "[", "]", "<", ">", "(", ")", "{", "}", ",", ";", ":",
           "=", "+", "-", ".")
SYMBOL_REGEXP = "|".join(re.escape(symbol) for symbol in SYMBOLS)

# the order of the alternatives is the priority of the tokens
TOKEN_REGEXP = re.compile("|".join([
    r"(?P<COMMENT>{})".format(COMMENT_REGEXP),
    r"(?P<NEWLINE>{})".format(NEWLINE_REGEXP),
    r"(?P<WHITESPACE>{})".format(WHITESPACE_REGEXP),
    r"(?P<INTERFACE>{})".format(INTERFACE_REGEXP),
    r"(?P<INT>{})".format(INT_REGEXP),
    r"(?P<IDENT>{})".format(IDENT_REGEXP),
    r"(?P<SYMBOL>{})".format(SYMBOL_REGEXP),
]))

###########################################
# Verilog identifiers
###########################################
# names that can be emitted unescaped in a Verilog module
VERILOG_IDENT_REGEXP = re.compile(r"^[A-Za-z_][A-Za-z0-9_$]*$")
