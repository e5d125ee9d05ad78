"""
The primitive library: extern signatures every program can use, their behavioral models for
the simulator and their Verilog modules for the backend.

New primitives are added with the :func:`register_primitive` class decorator. A model
declares which outputs follow its inputs within the same cycle (``comb_deps``); everything
else is read from state that only changes in :meth:`PrimitiveModel.tick`.
"""

import functools
import logging
import textwrap
from dataclasses import dataclass
from typing import Dict, Mapping, Optional, Tuple

from filament.parser import parse
from filament.syntax import Program

logger = logging.getLogger(__name__)

PRELUDE = """\
// combinational and sequential arithmetic
extern comp Add[WIDTH=32]<G: 1>(@interface[G] go: 1, @[G, G+1] left: WIDTH,
    @[G, G+1] right: WIDTH) -> (@[G, G+1] out: WIDTH);
extern comp ContAdd[WIDTH=32]<G: 1>(@[G, G+1] left: WIDTH, @[G, G+1] right: WIDTH)
    -> (@[G, G+1] out: WIDTH);
extern comp LongAdd[WIDTH=32]<G: L-G, L: 1>(@[G, L] left: WIDTH, @[G, L] right: WIDTH)
    -> (@[G, L] out: WIDTH) where L > G;
extern comp Mux[WIDTH=32]<G: 1>(@[G, G+1] sel: 1, @[G, G+1] in0: WIDTH,
    @[G, G+1] in1: WIDTH) -> (@[G, G+1] out: WIDTH);
extern comp MultComb[WIDTH=32]<G: 1>(@[G, G+1] left: WIDTH, @[G, G+1] right: WIDTH)
    -> (@[G, G+1] out: WIDTH);
extern comp Mult[WIDTH=32]<G: 3>(@interface[G] go: 1, @[G, G+1] left: WIDTH,
    @[G, G+1] right: WIDTH) -> (@[G+2, G+3] out: WIDTH);
extern comp FastMult[WIDTH=32]<G: 1>(@interface[G] go: 1, @[G, G+1] left: WIDTH,
    @[G, G+1] right: WIDTH) -> (@[G+2, G+3] out: WIDTH);

// state
extern comp Reg[WIDTH=32]<G: 1>(@interface[G] en: 1, @[G, G+1] in: WIDTH)
    -> (@[G+1, G+2] out: WIDTH);
extern comp Register[WIDTH=32]<G: L-(G+1), L: 1>(@interface[G] en: 1, @[G, G+1] in: WIDTH)
    -> (@[G+1, L] out: WIDTH) where L > G+1;
extern comp Delay[WIDTH=32]<G: 1>(@[G, G+1] in: WIDTH) -> (@[G+1, G+2] out: WIDTH);
extern comp Prev[WIDTH=32, SAFE=1]<G: 1>(@interface[G] en: 1, @[G, G+1] in: WIDTH)
    -> (@[G, G+1] prev: WIDTH);
extern comp ContPrev[WIDTH=32, SAFE=1]<G: 1>(@[G, G+1] in: WIDTH) -> (@[G, G+1] prev: WIDTH);
extern comp Acc[WIDTH=32]<G: 1>(@interface[G] en: 1, @[G, G+1] in: WIDTH)
    -> (@[G, G+1] out: WIDTH);

// one step of 8 bit restoring division
extern comp Init<G: 1>(@interface[G] go: 1, @[G, G+1] left: 8)
    -> (@[G, G+1] A: 8, @[G, G+1] Q: 8);
extern comp Nxt<G: 1>(@interface[G] go: 1, @[G, G+1] a: 8, @[G, G+1] q: 8,
    @[G, G+1] div: 8) -> (@[G, G+1] A: 8, @[G, G+1] Q: 8);
"""


class _Invalid(object):
    """Value of a wire outside of any availability window"""
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "X"

    def __bool__(self):
        return False


INVALID = _Invalid()


def is_valid(value) -> bool:
    return value is not INVALID


def mask(value, width: int):
    if value is INVALID:
        return INVALID
    return value & ((1 << width) - 1)


def _lift(function, *values):
    # arithmetic on an invalid operand yields an invalid result
    if any(value is INVALID for value in values):
        return INVALID
    return function(*values)


@dataclass(frozen=True)
class Primitive:
    name: str
    model: type
    verilog: str


PRIMITIVES: Dict[str, Primitive] = {}


def register_primitive(name: str, verilog: str):
    """Class decorator adding a behavioral model and its Verilog module to the library

    Parameters
    ----------
    name: str
        Name of the extern component the model implements
    verilog: str
        Text of the Verilog module. The module must have ``clk`` and ``reset`` inputs

    Examples
    --------
    >>> @register_primitive("Not", "module Not(input wire clk, input wire reset); endmodule")
    ... class NotModel(PrimitiveModel):
    ...     comb_deps = {"out": ("in",)}
    ...     def outputs(self, inputs):
    ...         return {"out": self.mask(_lift(lambda x: ~x, inputs["in"]))}
    >>> PRIMITIVES["Not"].model is NotModel
    True
    >>> _ = PRIMITIVES.pop("Not")
    """

    def decorator(cls):
        if name in PRIMITIVES:
            logger.debug("Replacing primitive {}".format(name))
        cls.primitive_name = name
        PRIMITIVES[name] = Primitive(name, cls, textwrap.dedent(verilog).strip() + "\n")
        return cls

    return decorator


def lookup_primitive(name: str) -> Optional[Primitive]:
    return PRIMITIVES.get(name)


class PrimitiveModel(object):
    """Cycle level behavior of one primitive instance

    Parameters
    ----------
    params: dict
        Parameter values of the instance, defaults filled in
    width: int
        Width of the data path (WIDTH or the fixed width of the primitive)
    """
    primitive_name = None
    comb_deps: Mapping[str, Tuple[str, ...]] = {}

    def __init__(self, params: Mapping[str, int], width: int = 32):
        self.params = dict(params)
        self.width = width

    def mask(self, value):
        return mask(value, self.width)

    def outputs(self, inputs: Mapping[str, object]) -> Dict[str, object]:
        """Output values of the current cycle"""
        raise NotImplementedError

    def tick(self, inputs: Mapping[str, object]) -> None:
        """Update the state at the clock edge that ends the current cycle"""


class BinaryModel(PrimitiveModel):
    comb_deps = {"out": ("left", "right")}
    operator = None

    def outputs(self, inputs):
        return {"out": self.mask(_lift(self.operator, inputs["left"], inputs["right"]))}


@register_primitive("Add", """
    module Add #(parameter WIDTH = 32) (
      input wire clk,
      input wire reset,
      input wire go,
      input wire [WIDTH-1:0] left,
      input wire [WIDTH-1:0] right,
      output wire [WIDTH-1:0] out
    );
      assign out = left + right;
    endmodule
""")
class AddModel(BinaryModel):
    operator = staticmethod(lambda a, b: a + b)


@register_primitive("ContAdd", """
    module ContAdd #(parameter WIDTH = 32) (
      input wire clk,
      input wire reset,
      input wire [WIDTH-1:0] left,
      input wire [WIDTH-1:0] right,
      output wire [WIDTH-1:0] out
    );
      assign out = left + right;
    endmodule
""")
class ContAddModel(AddModel):
    pass


@register_primitive("LongAdd", """
    module LongAdd #(parameter WIDTH = 32) (
      input wire clk,
      input wire reset,
      input wire [WIDTH-1:0] left,
      input wire [WIDTH-1:0] right,
      output wire [WIDTH-1:0] out
    );
      assign out = left + right;
    endmodule
""")
class LongAddModel(AddModel):
    pass


@register_primitive("MultComb", """
    module MultComb #(parameter WIDTH = 32) (
      input wire clk,
      input wire reset,
      input wire [WIDTH-1:0] left,
      input wire [WIDTH-1:0] right,
      output wire [WIDTH-1:0] out
    );
      assign out = left * right;
    endmodule
""")
class MultCombModel(BinaryModel):
    operator = staticmethod(lambda a, b: a * b)


@register_primitive("Mux", """
    module Mux #(parameter WIDTH = 32) (
      input wire clk,
      input wire reset,
      input wire sel,
      input wire [WIDTH-1:0] in0,
      input wire [WIDTH-1:0] in1,
      output wire [WIDTH-1:0] out
    );
      assign out = sel ? in1 : in0;
    endmodule
""")
class MuxModel(PrimitiveModel):
    comb_deps = {"out": ("sel", "in0", "in1")}

    def outputs(self, inputs):
        sel = inputs["sel"]
        if sel is INVALID:
            return {"out": INVALID}
        return {"out": self.mask(inputs["in1"] if sel & 1 else inputs["in0"])}


MULT_VERILOG = """
    module {name} #(parameter WIDTH = 32) (
      input wire clk,
      input wire reset,
      input wire go,
      input wire [WIDTH-1:0] left,
      input wire [WIDTH-1:0] right,
      output wire [WIDTH-1:0] out
    );
      reg [WIDTH-1:0] stage1;
      reg [WIDTH-1:0] stage2;
      always @(posedge clk) begin
        if (reset) begin
          stage1 <= 0;
          stage2 <= 0;
        end else begin
          stage1 <= go ? left * right : 0;
          stage2 <= stage1;
        end
      end
      assign out = stage2;
    endmodule
"""


@register_primitive("Mult", MULT_VERILOG.format(name="Mult"))
class MultModel(PrimitiveModel):
    """Two stage multiplier: the product of the operands sampled with go appears two
    cycles later"""

    def __init__(self, params, width=32):
        super().__init__(params, width)
        self.stages = [INVALID, INVALID]

    def outputs(self, inputs):
        return {"out": self.stages[-1]}

    def tick(self, inputs):
        product = INVALID
        if inputs.get("go") == 1:
            product = self.mask(_lift(lambda a, b: a * b, inputs["left"], inputs["right"]))
        self.stages = [product] + self.stages[:-1]


@register_primitive("FastMult", MULT_VERILOG.format(name="FastMult"))
class FastMultModel(MultModel):
    pass


REGISTER_VERILOG = """
    module {name} #(parameter WIDTH = 32) (
      input wire clk,
      input wire reset,
      input wire en,
      input wire [WIDTH-1:0] in,
      output wire [WIDTH-1:0] out
    );
      reg [WIDTH-1:0] value;
      always @(posedge clk) begin
        if (reset) value <= 0;
        else if (en) value <= in;
      end
      assign out = value;
    endmodule
"""


@register_primitive("Reg", REGISTER_VERILOG.format(name="Reg"))
class RegModel(PrimitiveModel):
    """Captures ``in`` when enabled and holds it until the next enable"""

    def __init__(self, params, width=32):
        super().__init__(params, width)
        self.value = INVALID

    def outputs(self, inputs):
        return {"out": self.value}

    def tick(self, inputs):
        if inputs.get("en") == 1:
            self.value = self.mask(inputs["in"])


@register_primitive("Register", REGISTER_VERILOG.format(name="Register"))
class RegisterModel(RegModel):
    pass


@register_primitive("Delay", """
    module Delay #(parameter WIDTH = 32) (
      input wire clk,
      input wire reset,
      input wire [WIDTH-1:0] in,
      output wire [WIDTH-1:0] out
    );
      reg [WIDTH-1:0] value;
      always @(posedge clk) begin
        if (reset) value <= 0;
        else value <= in;
      end
      assign out = value;
    endmodule
""")
class DelayModel(RegModel):
    def tick(self, inputs):
        self.value = self.mask(inputs["in"])


@register_primitive("Prev", """
    module Prev #(parameter WIDTH = 32, parameter SAFE = 1) (
      input wire clk,
      input wire reset,
      input wire en,
      input wire [WIDTH-1:0] in,
      output wire [WIDTH-1:0] prev
    );
      reg [WIDTH-1:0] value;
      always @(posedge clk) begin
        if (reset) value <= 0;
        else if (en) value <= in;
      end
      assign prev = value;
    endmodule
""")
class PrevModel(PrimitiveModel):
    """Outputs the value stored by the previous enabled cycle

    With ``SAFE=0`` the first read is undefined.
    """

    def __init__(self, params, width=32):
        super().__init__(params, width)
        self.value = 0 if self.params.get("SAFE", 1) else INVALID

    def outputs(self, inputs):
        return {"prev": self.value}

    def tick(self, inputs):
        if inputs.get("en") == 1:
            self.value = self.mask(inputs["in"])


@register_primitive("ContPrev", """
    module ContPrev #(parameter WIDTH = 32, parameter SAFE = 1) (
      input wire clk,
      input wire reset,
      input wire [WIDTH-1:0] in,
      output wire [WIDTH-1:0] prev
    );
      reg [WIDTH-1:0] value;
      always @(posedge clk) begin
        if (reset) value <= 0;
        else value <= in;
      end
      assign prev = value;
    endmodule
""")
class ContPrevModel(PrevModel):
    def tick(self, inputs):
        self.value = self.mask(inputs["in"])


@register_primitive("Acc", """
    module Acc #(parameter WIDTH = 32) (
      input wire clk,
      input wire reset,
      input wire en,
      input wire [WIDTH-1:0] in,
      output wire [WIDTH-1:0] out
    );
      reg [WIDTH-1:0] total;
      always @(posedge clk) begin
        if (reset) total <= 0;
        else if (en) total <= total + in;
      end
      assign out = total + in;
    endmodule
""")
class AccModel(PrimitiveModel):
    """Running sum: ``out`` is the stored total plus ``in``; enabling stores it"""
    comb_deps = {"out": ("in",)}

    def __init__(self, params, width=32):
        super().__init__(params, width)
        self.total = 0

    def outputs(self, inputs):
        return {"out": self.mask(_lift(lambda t, x: t + x, self.total, inputs["in"]))}

    def tick(self, inputs):
        if inputs.get("en") == 1:
            self.total = self.outputs(inputs)["out"]


@register_primitive("Init", """
    module Init (
      input wire clk,
      input wire reset,
      input wire go,
      input wire [7:0] left,
      output wire [7:0] A,
      output wire [7:0] Q
    );
      assign A = 8'd0;
      assign Q = left;
    endmodule
""")
class InitModel(PrimitiveModel):
    comb_deps = {"A": (), "Q": ("left",)}

    def outputs(self, inputs):
        return {"A": 0, "Q": mask(inputs["left"], 8)}


@register_primitive("Nxt", """
    module Nxt (
      input wire clk,
      input wire reset,
      input wire go,
      input wire [7:0] a,
      input wire [7:0] q,
      input wire [7:0] div,
      output wire [7:0] A,
      output wire [7:0] Q
    );
      wire [8:0] shifted = {a, q[7]};
      wire fits = shifted >= {1'b0, div};
      wire [8:0] rest = fits ? shifted - {1'b0, div} : shifted;
      assign A = rest[7:0];
      assign Q = {q[6:0], fits};
    endmodule
""")
class NxtModel(PrimitiveModel):
    """Shift the partial remainder, subtract the divisor when it fits"""
    comb_deps = {"A": ("a", "q", "div"), "Q": ("a", "q", "div")}

    def outputs(self, inputs):
        a, q, div = inputs["a"], inputs["q"], inputs["div"]
        if INVALID in (a, q, div):
            return {"A": INVALID, "Q": INVALID}
        shifted = (a << 1) | (q >> 7)
        fits = shifted >= div
        rest = shifted - div if fits else shifted
        return {"A": rest & 0xFF, "Q": ((q << 1) | int(fits)) & 0xFF}


def restoring_divide(dividend: int, divisor: int, steps: int = 8) -> Tuple[int, int]:
    """Quotient and remainder computed by ``steps`` iterations of the Nxt model

    Examples
    --------
    >>> restoring_divide(100, 7)
    (14, 2)
    """
    step = NxtModel({}, 8)
    a, q = 0, dividend & 0xFF
    for _ in range(steps):
        out = step.outputs({"a": a, "q": q, "div": divisor & 0xFF})
        a, q = out["A"], out["Q"]
    return q, a


@functools.lru_cache(maxsize=None)
def library() -> Program:
    """The parsed prelude"""
    return parse(PRELUDE, "<prelude>")


def primitives_verilog(names=None) -> str:
    """Verilog text of the requested primitives (all when None) in name order"""
    if names is None:
        names = PRIMITIVES.keys()
    return "\n".join(PRIMITIVES[name].verilog for name in sorted(set(names)))
