"""Regenerates the toy-city feeds (tram/ and bus/) and boundary.geojson.

Stop positions follow the north-south corridor of the station catalogue so the
builtin scenarios apply unchanged. Run from this directory.
"""
import json
import math
import os

STOPS = {
    "stalle": ("Stalle", 50.8065, 4.3235),
    "globe": ("Globe", 50.8112, 4.3330),
    "albert": ("Albert", 50.816380, 4.345280),
    "horta": ("Horta", 50.823680, 4.344870),
    "parvis": ("Parvis de Saint-Gilles", 50.828980, 4.345400),
    "hal": ("Porte de Hal", 50.833310, 4.345250),
    "midi": ("Gare du Midi", 50.836050, 4.336630),
    "toots": ("Toots Thielemans", 50.840040, 4.341760),
    "anneessens": ("Anneessens", 50.843910, 4.345980),
    "bourse": ("Bourse", 50.847870, 4.349200),
    "brouckere": ("De Brouckère", 50.850880, 4.352200),
    "rogier": ("Rogier", 50.855360, 4.358200),
    "nord": ("Gare du Nord", 50.859910, 4.360850),
    "esplanade": ("Esplanade", 50.8960, 4.3430),
    "heysel": ("Heysel", 50.8895, 4.3440),
    "bockstael": ("Bockstael", 50.8800, 4.3480),
    "pannenhuis": ("Pannenhuis", 50.8700, 4.3500),
    "yser": ("Yser", 50.8580, 4.3500),
    "liedts": ("Liedts", 50.866200, 4.365960),
    "vanderkindere": ("Vanderkindere", 50.8118, 4.3560),
    "bascule": ("Bascule", 50.8175, 4.3615),
    "legrand": ("Legrand", 50.8200, 4.3690),
    "flagey": ("Flagey", 50.8275, 4.3725),
    "germoir": ("Germoir", 50.8350, 4.3800),
    "diamant": ("Diamant", 50.8500, 4.3990),
    "meiser": ("Meiser", 50.8545, 4.3960),
    "colignon": ("Colignon", 50.869090, 4.371940),
    "verboekhoven": ("Verboekhoven", 50.871820, 4.378950),
    "riga": ("Riga", 50.869720, 4.386860),
    "tilleul": ("Tilleul", 50.873740, 4.392260),
    "paix": ("Paix", 50.876900, 4.399130),
    "bordet": ("Bordet", 50.878770, 4.411080),
}

TRAM = {
    "4": ("T4", "Stalle - Gare du Nord",
          ["stalle", "globe", "albert", "horta", "parvis", "hal", "midi",
           "anneessens", "bourse", "brouckere", "rogier", "nord"], 480),
    "10": ("T10", "Esplanade - Liedts",
           ["esplanade", "heysel", "bockstael", "pannenhuis", "yser", "rogier",
            "nord", "liedts"], 600),
    "7": ("T7", "Vanderkindere - Meiser",
          ["vanderkindere", "legrand", "flagey", "germoir", "diamant", "meiser"], 600),
}
BUS = {
    "38": ("B38", "Gare du Midi - Vanderkindere",
           ["midi", "toots", "hal", "parvis", "horta", "bascule", "vanderkindere"], 900),
    "59": ("B59", "Nord - Bordet",
           ["nord", "liedts", "colignon", "verboekhoven", "riga", "tilleul",
            "paix", "bordet", "meiser"], 720),
}


def haversine(a, b):
    r = 6371008.8
    la1, lo1, la2, lo2 = map(math.radians, (a[0], a[1], b[0], b[1]))
    h = (math.sin((la2 - la1) / 2) ** 2
         + math.cos(la1) * math.cos(la2) * math.sin((lo2 - lo1) / 2) ** 2)
    return 2 * r * math.asin(math.sqrt(h))


def hms(t):
    return "%02d:%02d:%02d" % (t // 3600, t // 60 % 60, t % 60)


def write(path, header, rows):
    with open(path, "w", newline="") as f:
        f.write(",".join(header) + "\n")
        for r in rows:
            f.write(",".join(str(x) for x in r) + "\n")


def run_times(seq, speed, dwell):
    out = [0]
    for a, b in zip(seq, seq[1:]):
        d = haversine(STOPS[a][1:], STOPS[b][1:])
        out.append(out[-1] + dwell + max(60, int(round(d / speed / 10.0)) * 10))
    return out


def make(dirname, agency, name, lines, speed, dwell, use_frequencies):
    os.makedirs(dirname, exist_ok=True)
    used = sorted({s for (_, _, seq, _) in lines.values() for s in seq})
    write(os.path.join(dirname, "agency.txt"),
          ["agency_id", "agency_name", "agency_url", "agency_timezone"],
          [[agency, name, "https://example.org/" + agency, "Europe/Brussels"]])
    write(os.path.join(dirname, "stops.txt"), ["stop_id", "stop_name", "stop_lat", "stop_lon"],
          [[s, '"%s"' % STOPS[s][0] if "," in STOPS[s][0] else STOPS[s][0],
            "%.6f" % STOPS[s][1], "%.6f" % STOPS[s][2]] for s in used])
    write(os.path.join(dirname, "routes.txt"),
          ["route_id", "agency_id", "route_short_name", "route_long_name", "route_type"],
          [[rid, agency, short, long_, 0 if agency == "tram" else 3]
           for short, (rid, long_, _, _) in sorted(lines.items(), key=lambda kv: kv[1][0])])
    write(os.path.join(dirname, "calendar.txt"),
          ["service_id", "monday", "tuesday", "wednesday", "thursday", "friday", "saturday",
           "sunday", "start_date", "end_date"],
          [["WK", 1, 1, 1, 1, 1, 0, 0, 20250101, 20251231],
           ["SA", 0, 0, 0, 0, 0, 1, 0, 20250101, 20251231]])
    write(os.path.join(dirname, "calendar_dates.txt"), ["service_id", "date", "exception_type"],
          [["WK", 20250721, 2], ["SA", 20250721, 1]])
    trips, stop_times, freqs = [], [], []
    for short, (rid, _, seq, headway) in sorted(lines.items(), key=lambda kv: kv[1][0]):
        for direction, stops in ((0, seq), (1, list(reversed(seq)))):
            rt = run_times(stops, speed, dwell)
            for service, first, last, hw in (("WK", 6 * 3600, 22 * 3600, headway),
                                             ("SA", 7 * 3600, 22 * 3600, headway * 3 // 2)):
                offset = 60 * (len(short) + direction * 3)
                if use_frequencies and short == "59":
                    tid = "%s_%s_%d_f" % (rid, service, direction)
                    trips.append([rid, service, tid, STOPS[stops[-1]][0], direction])
                    for k, s in enumerate(stops):
                        t = first + offset + rt[k]
                        stop_times.append([tid, hms(t), hms(t + (dwell if 0 < k < len(stops) - 1 else 0)), s, k + 1])
                    freqs.append([tid, hms(first + offset), hms(last), hw, 1])
                    continue
                n = 0
                for dep in range(first + offset, last, hw):
                    tid = "%s_%s_%d_%03d" % (rid, service, direction, n)
                    n += 1
                    trips.append([rid, service, tid, STOPS[stops[-1]][0], direction])
                    for k, s in enumerate(stops):
                        arr = dep + rt[k]
                        d = arr + (dwell if 0 < k < len(stops) - 1 else 0)
                        stop_times.append([tid, hms(arr), hms(d), s, k + 1])
    write(os.path.join(dirname, "trips.txt"),
          ["route_id", "service_id", "trip_id", "trip_headsign", "direction_id"], trips)
    write(os.path.join(dirname, "stop_times.txt"),
          ["trip_id", "arrival_time", "departure_time", "stop_id", "stop_sequence"], stop_times)
    if freqs:
        write(os.path.join(dirname, "frequencies.txt"),
              ["trip_id", "start_time", "end_time", "headway_secs", "exact_times"], freqs)


make("tram", "tram", "Toy Tram", TRAM, 5.0, 20, False)
make("bus", "bus", "Toy Bus", BUS, 4.0, 20, True)

# A corridor along the stations, widened by about 1.5 km.
ring = [[4.3150, 50.8000], [4.3700, 50.8000], [4.3950, 50.8300], [4.4250, 50.8650],
        [4.4250, 50.8900], [4.3800, 50.8900], [4.3600, 50.9050], [4.3250, 50.9050],
        [4.3250, 50.8500], [4.3150, 50.8000]]
with open("boundary.geojson", "w") as f:
    json.dump({"type": "FeatureCollection", "features": [{
        "type": "Feature", "properties": {"name": "toy corridor"},
        "geometry": {"type": "Polygon", "coordinates": [ring]}}]}, f, indent=1)
    f.write("\n")
