"""
Some global variable definitions
"""

# largest event offset (in cycles) the compiler accepts
OFFSET_LIMIT = 2 ** 16

# upper value used when enumerating integer models of a constraint set
BRUTE_FORCE_BOUND = 16

# name of the distinguished origin node in the difference-constraint graph
ORIGIN = "0"

# suffix given to the instance created by `x := new C<G>(..)`
FUSED_INSTANCE_SUFFIX = "_inst"

# name of the component picked as entry point when present
ENTRY_NAME = "main"

# extern ports that are threaded through without an availability interval
PASS_THROUGH_PORTS = ("clk", "reset")

SETTINGS_FILE = "settings.yml"
