#!/usr/bin/env python3
"""Generate the synthetic APAC superstore fixture.

The table mimics the global superstore sample used in shelf-builder demos:
four APAC regions, three product categories, orders from 2011 to 2014.
North Asia furniture sales collapse in 2012, mostly because Beijing, Jining
and Seoul sell almost nothing that year.

Sales and Profit are multiples of 0.25 so that sums are exact in float64.

    python3 tools/gen_superstore.py > tests/fixtures/superstore.csv
"""

import argparse
import csv
import datetime as dt
import random
import sys

REGIONS = {
    "North Asia": {
        "China": [("Beijing", "Beijing"), ("Jining", "Shandong"), ("Shanghai", "Shanghai")],
        "South Korea": [("Seoul", "Seoul"), ("Busan", "Busan")],
        "Japan": [("Tokyo", "Tokyo"), ("Osaka", "Osaka")],
    },
    "Southeast Asia": {
        "Indonesia": [("Jakarta", "Jakarta"), ("Surabaya", "East Java")],
        "Philippines": [("Manila", "National Capital")],
        "Vietnam": [("Hanoi", "Hanoi")],
        "Thailand": [("Bangkok", "Bangkok")],
    },
    "Oceania": {
        "Australia": [("Sydney", "New South Wales"), ("Melbourne", "Victoria"), ("Brisbane", "Queensland")],
        "New Zealand": [("Auckland", "Auckland")],
    },
    "Central Asia": {
        "India": [("Mumbai", "Maharashtra"), ("Delhi", "Delhi"), ("Chennai", "Tamil Nadu")],
        "Pakistan": [("Karachi", "Sindh")],
        "Bangladesh": [("Dhaka", "Dhaka")],
    },
}

CATEGORIES = {
    "Furniture": ["Chairs", "Tables", "Bookcases", "Furnishings"],
    "Office Supplies": ["Binders", "Paper", "Storage", "Art", "Labels"],
    "Technology": ["Phones", "Copiers", "Machines", "Accessories"],
}

PRICE_SCALE = {"Furniture": 420.0, "Office Supplies": 90.0, "Technology": 520.0}

CUSTOMERS = [
    "Aaron Bergman", "Adam Hart", "Alan Dominguez", "Alex Avila", "Amy Cox", "Andrew Allen",
    "Anna Chung", "Barry Franz", "Bill Shonely", "Brenda Bowman", "Carl Ludwig", "Cindy Stewart",
    "Dan Reichenbach", "Dave Hallsten", "Dean Braden", "Eric Hoffmann", "Erin Smith", "Frank Olsen",
    "Gary Zandusky", "Greg Tran", "Harold Pawlan", "Helen Wasserman", "Irene Maddox", "Jack Lebron",
    "Jane Waco", "Jim Karlsson", "Joel Eaton", "Ken Lonsdale", "Karen Daniels", "Lena Radford",
    "Linda Cazamias", "Mark Packer", "Maria Bertelson", "Nick Crebassa", "Olvera Toch", "Pete Armstrong",
    "Quincy Jones", "Rob Dowd", "Sally Knutson", "Sean Miller", "Tom Boeckenhauer", "Valerie Dominguez",
]
SEGMENTS = ["Consumer", "Corporate", "Home Office"]
SHIP_MODES = ["Standard Class", "Second Class", "First Class", "Same Day"]
PRIORITIES = ["Low", "Medium", "High", "Critical"]
YEARS = [2011, 2012, 2013, 2014]
COLLAPSED_CITIES = {"Beijing", "Jining", "Seoul"}

HEADER = [
    "Row ID", "Order ID", "Order Date", "Ship Date", "Ship Mode", "Customer Name", "Segment",
    "City", "State", "Country", "Market", "Region", "Product ID", "Category", "Sub-Category",
    "Sales", "Quantity", "Discount", "Profit", "Order Priority", "Year",
]


def quarter(value):
    return round(value * 4) / 4


def fmt(value):
    text = f"{value:.2f}".rstrip("0").rstrip(".")
    return "0" if text in ("-0", "") else text


def make_rows(count, seed):
    rng = random.Random(seed)
    places = [
        (region, country, city, state)
        for region, countries in REGIONS.items()
        for country, cities in countries.items()
        for city, state in cities
    ]
    rows = []
    order_no = 100000
    while len(rows) < count:
        region, country, city, state = rng.choice(places)
        year = rng.choice(YEARS)
        category = rng.choices(list(CATEGORIES), weights=[3, 5, 3])[0]
        collapsed = year == 2012 and (city in COLLAPSED_CITIES or (region == "North Asia" and category == "Furniture"))
        if collapsed and rng.random() < 0.85:
            continue  # far fewer orders in the bad year
        sub = rng.choice(CATEGORIES[category])
        quantity = rng.randint(1, 14)
        discount = rng.choice([0.0, 0.0, 0.1, 0.2, 0.3, 0.5])
        unit = PRICE_SCALE[category] * rng.lognormvariate(-0.6, 0.7)
        if collapsed:
            unit = rng.uniform(0.5, 3.0)
            quantity = 1
        sales = max(0.25, quarter(unit * quantity * (1 - discount) / 4))
        margin = rng.uniform(-0.25, 0.35) - discount * 0.4
        profit = quarter(sales * margin)
        day = dt.date(year, 1, 1) + dt.timedelta(days=rng.randrange(365))
        ship = day + dt.timedelta(days=rng.randint(0, 7))
        order_no += rng.randint(1, 40)
        rows.append([
            str(len(rows) + 1),
            f"{country[:2].upper()}-{year}-{order_no}",
            day.isoformat(),
            ship.isoformat(),
            rng.choice(SHIP_MODES),
            rng.choice(CUSTOMERS),
            rng.choice(SEGMENTS),
            city,
            state,
            country,
            "APAC",
            region,
            f"{category[:3].upper()}-{sub[:2].upper()}-{rng.randint(10000000, 10009999)}",
            category,
            sub,
            fmt(sales),
            str(quantity),
            fmt(discount),
            fmt(profit),
            rng.choice(PRIORITIES),
            str(year),
        ])
    return rows


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--rows", type=int, default=1000)
    parser.add_argument("--seed", type=int, default=20120)
    args = parser.parse_args()
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(HEADER)
    writer.writerows(make_rows(args.rows, args.seed))


if __name__ == "__main__":
    main()
