#!/usr/bin/env python3
"""Exact money arithmetic with total division.

Every amount in the simulator is an exact rational. Division is total:
dividing by zero gives zero, so no money computation can raise mid-run.
This script walks the arithmetic, the parser, and the laws that the test
suite checks over thousands of random values.

Run:
    python demos/01_exact_money.py
"""

from rpsf import Quantity, ZERO, ONE, inverse, parse_quantity, total_div


def section(title):
    print(f"\n--- {title} ---")


section("Construction and canonical form")
print("Quantity(2, 4)   ->", Quantity(2, 4), "   (reduced)")
print("Quantity(3, -6)  ->", Quantity(3, -6), " (sign moves to the numerator)")
print("Quantity(0, 9)   ->", Quantity(0, 9), "   (zero is 0/1)")

section("Arithmetic is exact, never floating point")
p = Quantity(1000)
c = Quantity(2)
q = Quantity(1, 20)
repayment = p - c + q * p
print(f"p={p}, c={c}, q={q}")
print("p - c + q*p =", repayment, "   (the savings-account repayment)")

section("Total division: dividing by zero is zero")
print("1 / 0   ->", total_div(ONE, ZERO))
print("10/100  ->", total_div(Quantity(10), Quantity(100)), "  (ten percent)")
print("inverse(0) ->", inverse(ZERO))

section("The inverse laws hold for every value, zero included")
for x in (Quantity(7, 3), Quantity(-5), ZERO):
    print(f"x={x}:  inverse(inverse(x)) = {inverse(inverse(x))}"
          f"   x*inverse(x)*x = {x * inverse(x) * x}")

section("Parsing accepts integers, ratios, and decimals - exactly")
for text in ("100", "11/4", "0.05", "1048.50"):
    print(f"  {text!r:10} -> {parse_quantity(text)}")

section("Comparison is a total order")
values = [Quantity(1, 3), Quantity(-2), Quantity(5, 2), ZERO]
print("sorted:", [str(v) for v in sorted(values)])
