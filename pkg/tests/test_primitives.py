from numpy.testing import assert_equal

from filament.primitives import (INVALID, PRIMITIVES, PrimitiveModel, is_valid, library,
                                 lookup_primitive, mask, primitives_verilog, register_primitive,
                                 restoring_divide)
from filament.resolve import resolve
from filament.typechecker import typecheck


def model(name, **params):
    primitive = lookup_primitive(name)
    signature = library().component(name).signature
    values = signature.param_values(tuple(params.get(p.name, p.default)
                                          for p in signature.params))
    return primitive.model(values, values.get("WIDTH", 8))


def test_invalid():
    assert not is_valid(INVALID)
    assert is_valid(0)
    assert_equal(repr(INVALID), "X")
    assert mask(INVALID, 8) is INVALID
    assert_equal(mask(0x1FF, 8), 0xFF)


def test_prelude_is_consistent():
    prelude = library()
    assert_equal(typecheck(resolve(prelude)), [])
    # every extern of the prelude has a model and a Verilog module
    for component in prelude.components:
        primitive = lookup_primitive(component.name)
        assert primitive is not None, component.name
        assert "module {} ".format(component.name) in primitive.verilog


def test_combinational_models():
    add = model("Add")
    assert_equal(add.outputs({"left": 0xFFFFFFFF, "right": 2})["out"], 1)
    assert add.outputs({"left": INVALID, "right": 2})["out"] is INVALID
    mux = model("Mux")
    assert_equal(mux.outputs({"sel": 0, "in0": 4, "in1": 5})["out"], 4)
    assert_equal(mux.outputs({"sel": 1, "in0": 4, "in1": 5})["out"], 5)
    assert mux.outputs({"sel": INVALID, "in0": 4, "in1": 5})["out"] is INVALID


def test_mult_latency():
    mult = model("Mult")
    seen = []
    for cycle, go in enumerate([1, 0, 0, 1, 0, 0]):
        seen.append(mult.outputs({})["out"])
        mult.tick({"go": go, "left": 3 + cycle, "right": 2})
    assert_equal(seen, [INVALID, INVALID, 6, INVALID, INVALID, 12])


def test_reg_holds_until_enabled():
    reg = model("Reg")
    assert reg.outputs({})["out"] is INVALID
    reg.tick({"en": 1, "in": 7})
    reg.tick({"en": 0, "in": 9})
    assert_equal(reg.outputs({})["out"], 7)


def test_prev():
    assert_equal(model("Prev").outputs({})["prev"], 0)
    assert model("Prev", SAFE=0).outputs({})["prev"] is INVALID
    prev = model("Prev")
    prev.tick({"en": 1, "in": 5})
    assert_equal(prev.outputs({})["prev"], 5)


def test_acc():
    acc = model("Acc")
    assert_equal(acc.outputs({"in": 3})["out"], 3)
    acc.tick({"en": 1, "in": 3})
    acc.tick({"en": 0, "in": 100})
    assert_equal(acc.outputs({"in": 4})["out"], 7)


def test_division_step():
    init = model("Init")
    assert_equal(init.outputs({"left": 100}), {"A": 0, "Q": 100})
    assert_equal(restoring_divide(100, 7), (14, 2))
    assert_equal(restoring_divide(255, 1), (255, 0))
    assert_equal(restoring_divide(3, 200), (0, 3))


def test_register_primitive():
    @register_primitive("Inc", "module Inc(input wire clk, input wire reset);\nendmodule")
    class IncModel(PrimitiveModel):
        comb_deps = {"out": ("in",)}

        def outputs(self, inputs):
            return {"out": self.mask(inputs["in"] + 1)}

    try:
        assert lookup_primitive("Inc").model is IncModel
        assert_equal(IncModel({}, 4).outputs({"in": 15}), {"out": 0})
        assert "module Inc(" in primitives_verilog(["Inc"])
    finally:
        PRIMITIVES.pop("Inc")
    assert lookup_primitive("Inc") is None


def test_primitives_verilog_order():
    text = primitives_verilog(["Reg", "Add", "Reg"])
    assert text.index("module Add ") < text.index("module Reg ")
    assert_equal(text.count("module Reg "), 1)
